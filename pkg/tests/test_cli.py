from __future__ import annotations

import json

import pytest

from qdscalc.cli import (
    SUITES,
    ConfigInvalid,
    RunConfig,
    canonical_bytes,
    compute_artifact,
    config_from_mapping,
    main,
    reachable_monomials,
    run_suite,
)


def test_default_config_matches_the_acceptance_run():
    cfg = RunConfig().validate()
    assert (cfg.base, cfg.fourier_window, cfg.cutoffs, cfg.word_budget) == ("circle", 8, [6], 3)
    assert cfg.tower().descriptor() == ("qds", ("circle", 8, 1), 6)


@pytest.mark.parametrize("bad", [{"base": "torus"}, {"cutoffs": []}, {"cutoffs": [0]}, {"word_budget": 0},
                                 {"mode": "fuzzy"}, {"suites": ["nope"]}, {"jobs": 0}, {"colour": 1}])
def test_invalid_configs_are_rejected(bad):
    with pytest.raises(ConfigInvalid):
        config_from_mapping(bad)


def test_config_hash_ignores_runtime_fields():
    a = RunConfig(jobs=1, out="-")
    b = RunConfig(jobs=4, out="report.json", cache_dir="/tmp/x")
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != RunConfig(word_budget=2).config_hash()


def test_cutoff_list_repeats_its_last_entry():
    cfg = RunConfig(base="point", qds_iterations=3, cutoffs=[3, 2])
    assert cfg.tower().descriptor() == ("qds", ("qds", ("qds", ("point",), 3), 2), 2)


@pytest.mark.parametrize("args,expected", [((8, 1, 3, 0), 7), ((8, 1, 3, 1), 7), ((3, 1, 3, 1), 7),
                                           ((8, 2, 2, 0), 9), ((2, 1, 1, 1), 2)])
def test_reachable_monomial_counts(args, expected):
    # hand counts of k0 + k1 with k1 != 0 and weights summing to at most the budget
    assert reachable_monomials(*args) == expected


def test_empty_suite_gives_empty_report(capsys):
    assert main(["verify", "--suite", "", "--out", "-"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["records"] == [] and report["summary"]["total"] == 0
    assert report["index_base"] == 0


def test_witness_suite_reports_the_value_table(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "--suite", "witnesses", "--cutoff", "7", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    values = [r["computed"]["value"] for r in report["records"] if r["id"].startswith("witnesses/circle_omega")]
    assert values == ["-2", "-4", "2", "4", "-2"]
    assert all(r["anchor"] for r in report["records"])


def test_failing_check_gives_nonzero_exit(tmp_path):
    out = tmp_path / "r.json"
    code = main(["verify", "--base", "point", "--qds-iterations", "2", "--cutoff", "3,3", "--word-budget", "1",
                 "--suite", "corollary", "--out", str(out)])
    report = json.loads(out.read_text())
    assert code == 1
    assert [r["pass"] for r in report["records"]] == [True, False]


def test_errors_are_captured_per_record():
    cfg = RunConfig(base="circle", suites=["laurent", "doubling"], cutoffs=[1]).validate()
    report, _ = run_suite(cfg)
    setup = report["records"][0]
    assert setup["id"] == "laurent/setup" and not setup["pass"]
    assert setup["error"].startswith("CutoffTooSmall")
    assert all(r["pass"] for r in report["records"][1:])


def test_compute_omega_on_the_point(capsys):
    assert main(["compute", "omega", "--degree", "0", "--base", "point"]) == 0
    art = json.loads(capsys.readouterr().out)
    assert art["omega"]["quotient_dim"] == 1 and art["index_base"] == 0


def test_compute_omega_degree_one_on_the_circle(capsys):
    assert main(["compute", "omega", "--degree", "1", "--base", "circle", "--word-budget", "2"]) == 0
    art = json.loads(capsys.readouterr().out)
    assert art["omega"]["quotient_dim"] == reachable_monomials(8, 1, 2, 1) == len(art["omega"]["basis"])


def test_cache_returns_identical_bytes_and_matches_fresh(tmp_path):
    cache = tmp_path / "cache"
    args = ["compute", "junk", "--degree", "2", "--base", "point", "--qds-iterations", "1", "--cutoff", "3",
            "--word-budget", "1", "--cache-dir", str(cache)]
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert main(args + ["--out", str(first)]) == 0
    assert len(list(cache.iterdir())) == 1
    assert main(args + ["--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    cfg = config_from_mapping({"base": "point", "qds_iterations": 1, "cutoffs": [3], "word_budget": 1})
    assert canonical_bytes(compute_artifact(cfg, "junk", 2)) == first.read_bytes()


def test_lift_command(capsys):
    assert main(["lift", "--base", "point", "--qds-iterations", "1", "--cutoff", "3"]) == 0
    art = json.loads(capsys.readouterr().out)["connection_lift"]
    assert art["module"] == "corner" and art["rank"] == 2
    assert art["diagram"]["operators_equal"] and art["diagram"]["classes_equal"]


def test_lift_without_a_module_reports_a_hint(capsys):
    assert main(["lift", "--base", "point"]) == 1
    assert "qds-iterations" in capsys.readouterr().err


def test_config_file_and_flags_combine(tmp_path, capsys):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"base": "point", "cutoffs": [3], "suites": ["laurent"]}))
    assert main(["verify", "--config", str(conf), "--cutoff", "2"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["config"]["cutoffs"] == [2]
    assert report["records"][0]["computed"] == [5, 5, 0]


def test_human_lines_use_one_based_indices(capsys):
    assert main(["verify", "--suite", "witnesses", "--base", "point", "--cutoff", "6", "--out", "-"]) == 0
    captured = capsys.readouterr()
    assert "1(x)e[2,1]" in captured.err
    report = json.loads(captured.out)
    first = report["records"][0]["computed"]["value"]
    assert first == [["1(x)e[1,0]", "-1"]]


def test_all_suites_are_known():
    assert set(SUITES) == {"s_calculus", "laurent", "base", "decomposition", "theorem", "corollary",
                           "doubling", "conditions", "witnesses", "connections"}
