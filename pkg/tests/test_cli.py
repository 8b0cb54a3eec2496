import subprocess
import sys

import pytest

from neckscope import cli


def run_cli(args, cwd):
    return subprocess.run([sys.executable, "-m", "neckscope.cli"] + args,
                          cwd=cwd, capture_output=True, text=True)


def test_registry_covers_operations():
    # Every public operation maps to exactly one subcommand.
    import neckscope.asymptotics as asym
    import neckscope.chain as chain
    import neckscope.hypersurfaces as hyp
    import neckscope.necks as necks
    import neckscope.pinching as pinch
    import neckscope.warped as warped

    ops = {
        "make_metric", "curvature_at", "distance", "geodesic_shoot",
        "ball_volume", "annulus_volume_mc",
        "normalize_parametrization", "certify_neck", "certify_absolute_neck",
        "epsilon_prime", "verify_absolute_conversion",
        "ascr_profile", "avr", "theta_profile", "busemann_estimate",
        "busemann_containment_check", "bishop_gromov_check",
        "relative_volume_report",
        "parallel_surface", "weingarten_bound_check", "gauss_bonnet_integrand",
        "q_bound_check", "area_lower_bound_check",
        "p_quantity", "necklike_delta", "lemma_c_check", "g_quantity",
        "j_quantity", "dichotomy_check", "integrate_curvature_ode",
        "init_flow", "step", "rescale_at", "track_neck",
        "delta_of_Lb", "ascr_lower_bound", "constants_for",
    }
    registered = set(cli.OP_REGISTRY)
    missing = ops - registered
    assert not missing, f"operations without a subcommand: {missing}"
    # each op reachable from exactly one subcommand by construction (dict)
    for op in ops:
        assert isinstance(cli.OP_REGISTRY[op], str)
    # and every registered op exists in some module
    modules = (warped, necks, asym, hyp, pinch, chain)
    import neckscope.flow as flow
    modules = modules + (flow,)
    for op in ops:
        assert any(hasattr(mod, op) for mod in modules), op


def test_unknown_flag_exits_2(tmp_path):
    res = run_cli(["chain", "--no-such-flag"], tmp_path)
    assert res.returncode == 2


def test_precondition_surfaces_as_exit_2(tmp_path):
    res = run_cli(["ascr", "profile", "--preset", "sphere", "--a", "1",
                   "--r1", "0.3", "--r2", "2.9", "--samples", "10"], tmp_path)
    assert res.returncode == 2
    assert "RequiresNoncompact" in res.stderr


def test_neck_certify_end_to_end(tmp_path):
    res = run_cli(["neck", "certify", "--preset", "flare", "--sigma", "0.05",
                   "--t-max", "400", "--k", "2", "--window", "30", "300",
                   "--out", "cert.csv"], tmp_path)
    assert res.returncode == 0, res.stderr
    body = (tmp_path / "cert.csv").read_text()
    assert body.splitlines()[0] == "a,b,k,L,eps_conformal,eps_logr,eps,pass"


def test_pinch_sample_deterministic(tmp_path):
    for name in ("a.csv", "b.csv"):
        res = run_cli(["pinch", "sample", "--count", "20000", "--seed", "7",
                       "--out", name], tmp_path)
        assert res.returncode == 0, res.stderr
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_chain_block_output(tmp_path):
    res = run_cli(["chain", "--n", "3", "--C0", "2.0", "--out", "chain.txt"],
                  tmp_path)
    assert res.returncode == 0
    text = (tmp_path / "chain.txt").read_text()
    assert "[chain]" in text and "[provenance]" in text
    assert "L_b" in text and "eps_b" in text


def test_metric_curvature_svg(tmp_path):
    res = run_cli(["metric", "curvature", "--preset", "sphere", "--a", "2",
                   "--samples", "40", "--out", "curv.csv", "--svg"], tmp_path)
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "curv.csv").exists()
    assert (tmp_path / "curv.svg").exists()


def test_flow_cylinder_run_with_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("profile=cylinder\ngrid=256\ncfl=0.25\nstop_rmax=3.0\n"
                   "snapshot_every=500\n")
    res = run_cli(["flow", "--config", str(cfg), "--out", "flowout"], tmp_path)
    assert res.returncode == 0, res.stderr
    series = (tmp_path / "flowout_series.csv").read_text().splitlines()
    assert series[0].startswith("t,R_max")
    assert (tmp_path / "flowout_final.csv").exists()
    assert (tmp_path / "flowout_manifest.txt").exists()


def test_volume_annulus_deterministic(tmp_path):
    args = ["volume", "annulus", "--preset", "flat", "--t-max", "40",
            "--q-t", "0.0", "--r1", "1", "--r2", "2",
            "--mc-samples", "4000", "--seed", "11", "--out", "ann.csv"]
    res1 = run_cli(args, tmp_path)
    first = (tmp_path / "ann.csv").read_bytes()
    res2 = run_cli(args, tmp_path)
    assert res1.returncode == res2.returncode == 0
    assert (tmp_path / "ann.csv").read_bytes() == first


def test_jobs_env_default(monkeypatch):
    monkeypatch.setenv("NECKSCOPE_JOBS", "3")
    parser = cli.build_parser()
    args = parser.parse_args(["chain"])
    assert args.jobs == 3


@pytest.mark.slow
def test_suite_quick_deterministic(tmp_path):
    outs = []
    for name in ("s1.csv", "s2.csv"):
        res = run_cli(["suite", "quick", "--seed", "7", "--out", name], tmp_path)
        assert res.returncode == 0, res.stdout + res.stderr
        outs.append((tmp_path / name).read_bytes())
    assert outs[0] == outs[1]
