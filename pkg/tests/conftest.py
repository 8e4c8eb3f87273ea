"""Shared pytest hooks: acceptance criteria summary."""
from __future__ import annotations

# One line per acceptance criterion, keyed by its test function name.
ACCEPTANCE_LABELS = {
    "test_self_retargeting_identity":
        "self-retargeting identity: 100 sequences, M=16, <=1e-6 px, <5s",
    "test_no_motion_and_translation_invariance":
        "no-motion returns reference and driving-translation invariance, <=1e-9 px, 100 trials, <5s",
    "test_local_stage_scale_invariance":
        "local-stage scale invariance for s in {0.5, 2, 10}, <=1e-6 px",
    "test_coordinate_frame_round_trip":
        "coordinate-frame round-trip: 1e5 pairs, <=1e-9 px, <2s",
    "test_matching_oracle_equivalence":
        "matching equals brute-force scan on 200 random maps, <10s",
    "test_matching_invariances":
        "matching invariant to rescaling and target permutation, 500 trials",
    "test_part_layout_partition":
        "part layout partitions 0..67 with sizes 17/10/9/12/20",
    "test_nme_contract":
        "NME zero-iff-equal, translation/scale invariant, hand-derived case to 1e-9",
    "test_format_round_trips":
        "1000 bitwise format round-trips and 20 positioned corruption errors",
    "test_end_to_end_pipeline_golden":
        "end-to-end pipeline fixture matches goldens bitwise",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes: dict[str, str] = {}
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            if "test_acceptance" not in report.nodeid:
                continue
            name = report.nodeid.split("::")[-1]
            if name not in ACCEPTANCE_LABELS:
                continue
            if getattr(report, "when", "call") != "call" and status == "passed":
                continue
            current = outcomes.get(name)
            if current != "FAIL":
                outcomes[name] = "FAIL" if status in ("failed", "error") else "PASS"
    if not outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, label in ACCEPTANCE_LABELS.items():
        status = outcomes.get(name, "NOT RUN")
        terminalreporter.write_line(f"{status:7s} {label}")
