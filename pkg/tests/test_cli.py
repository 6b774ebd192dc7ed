import io
import json
import subprocess
import sys

import pytest

from timescales.cli import encode, load_config, main
from timescales.errors import ConfigError


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def lines(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def one(*argv):
    code, out, err = run(*argv)
    assert code == 0, err
    [obj] = lines(out)
    return obj


@pytest.fixture
def config_file(tmp_path):
    def write(cfg):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        return str(path)
    return write


SMALL = {
    "scales": {"pts": [0, 1, 2], "gap": [[0, 1], [2, 3]]},
    "functions": {"sq": {"expr": "t^2", "scale": "pts"}, "one": {"expr": "1", "scale": "gap"}},
    "problems": {},
}


# -- encoding --------------------------------------------------------------------


def test_encode_is_fixed_and_17_digit():
    assert encode({"b": 0.1, "a": [1, float("inf")]}) == '{"b": 0.10000000000000001, "a": [1, null]}'
    assert encode(3.0) == "3"
    assert encode(True) == "true"


# -- classify ------------------------------------------------------------------------


def test_classify_scale_with_a_jump(config_file):
    rep = one("--config", config_file(SMALL), "classify", "gap")
    row = next(r for r in rep["rows"] if r["t"] == 1)
    assert row["sigma"] == 2 and row["mu"] == 1 and row["class"].startswith("right-scattered")
    assert rep["dual"] == [[-3, -2], [-1, 0]]


def test_classify_interval_interior_is_dense():
    rep = one("classify", "--literal", "[[0,1]]")
    inner = [r for r in rep["rows"] if 0 < r["t"] < 1]
    assert inner and all(r["class"] == "right-dense, left-dense" for r in inner)


def test_classify_discrete_graininess_matches_differences():
    rep = one("classify", "--literal", "[0, 0.5, 2, 2.25]")
    pts = [0, 0.5, 2, 2.25]
    for i, r in enumerate(rep["rows"]):
        assert r["mu"] == (pts[i + 1] - pts[i] if i + 1 < len(pts) else 0)
        assert r["nu"] == (pts[i] - pts[i - 1] if i > 0 else 0)


# -- deriv / integrate ---------------------------------------------------------------------


def test_deriv_and_integrate_examples(config_file):
    path = config_file(SMALL)
    rep = one("--config", path, "deriv", "sq", "--at", "1")
    assert rep["value"] == 3 and rep["method"] == "scattered-exact"
    assert one("--config", path, "integrate", "one", "--from", "0", "--to", "3")["value"] == 3
    assert one("--config", path, "deriv", "sq", "--at", "1", "--setting", "nabla")["value"] == 1


def test_deriv_at_max_is_a_domain_error(config_file):
    code, out, err = run("--config", config_file(SMALL), "deriv", "sq", "--at", "2")
    assert code == 3 and out == ""
    assert json.loads(err)["error"] == "NotInDomainKappa"


def test_unknown_function_is_a_config_error():
    code, _, err = run("deriv", "nope", "--at", "0")
    assert code == 2 and json.loads(err)["error"] == "ConfigError"


# -- dualize ---------------------------------------------------------------------------


def test_dualize_examples():
    assert one("dualize", "--literal", "[[0,1]]") == [[-1, 0]]
    rep = one("dualize", "--literal", json.dumps({"expr": "t^3", "scale": [[0, 1]]}))
    assert rep["expr"] == "(-t)^3" and rep["scale"] == [[-1, 0]]
    rep = one("dualize", "momentum")
    assert rep["setting"] == "nabla" and (rep["a"], rep["b"], rep["alpha"], rep["beta"]) == (-3, 0, 1, 0)


@pytest.mark.parametrize("name", ["unit", "mixed", "cantor2", "cube", "growth", "drift",
                                  "classical", "spring", "momentum"])
def test_dualize_round_trips_through_the_interface(name):
    cfg = load_config()
    first = one("dualize", name)
    back = one("dualize", "--literal", encode(first))
    again = one("dualize", "--literal", encode(back))
    assert again == first
    # back is the original object in literal form
    if name in cfg.scales:
        assert back == [list(s) for s in cfg.scales[name].segments]


def test_dualized_problem_keeps_its_value():
    from timescales.cli import _problem
    from timescales.variational import functional_value
    lit = one("dualize", "momentum")
    dual = _problem(lit, {}, "literal")
    primal = load_config().problems["momentum"]
    assert abs(functional_value(dual.problem, dual.candidate)
               - functional_value(primal.problem, primal.candidate)) <= 1e-12


def test_dualize_unknown_literal_shape():
    code, _, err = run("dualize", "--literal", '"hello"')
    assert code == 2


# -- verify -------------------------------------------------------------------------------


def test_verify_default_config_passes():
    code, out, _ = run("verify")
    reports = lines(out)
    assert code == 0 and reports and all(r["passed"] for r in reports)
    assert {r["scale_id"].split("@")[-1] for r in reports} >= {"unit", "integers", "mixed", "cantor2", "sparse"}


def test_verify_is_byte_identical():
    assert run("verify", "--array") == run("verify", "--array")
    assert run("verify", "--seed", "3") == run("verify", "--seed", "3")


def test_verify_identity_filter_and_tolerance_override():
    code, out, _ = run("verify", "--identity", "integral_duality", "--tol", "integral_tol=1e-3")
    reports = lines(out)
    assert code == 0 and {r["identity_name"] for r in reports} == {"integral_duality"}
    assert all(r["tolerance"] == 1e-3 for r in reports)
    assert run("verify", "--identity", "made_up")[0] == 2


def test_verify_bad_tolerance_flags():
    assert run("--tol", "identity_tol=abc", "verify")[0] == 2
    assert run("--tol", "speed=1", "verify")[0] == 2


def test_verify_fails_with_exit_1_at_zero_tolerance():
    flags = ["--tol", "identity_tol=0", "--tol", "integral_tol=0", "--tol", "derivative_tol=0"]
    code, out, _ = run(*flags, "verify")
    reports = lines(out)
    assert code == 1 and not all(r["passed"] for r in reports)
    # the structural rows stay exact even at zero tolerance
    assert all(r["passed"] for r in reports if r["identity_name"] == "jump_duality")


def test_verify_array_mode():
    code, out, _ = run("verify", "--array", "--identity", "jump_duality")
    data = json.loads(out)
    assert code == 0 and isinstance(data, list) and len(data) == 5


def test_domain_error_at_load_is_exit_2(config_file):
    cfg = {"scales": {"s": [[-1, 1]]}, "functions": {"bad": {"expr": "ln(t)", "scale": "s"}}}
    code, _, err = run("--config", config_file(cfg), "verify")
    assert code == 2 and json.loads(err)["error"] == "ConfigError"


@pytest.mark.parametrize("cfg", [
    {"scales": {"s": [[0, 1]]}, "functions": {"f": {"expr": "t", "scale": "missing"}}},
    {"scales": {"s": [[1, 0]]}},
    {"scales": {"s": [[0, 1]]}, "functions": {"f": {"expr": "t +", "scale": "s"}}},
    {"scales": {"s": [[0, 1]]}, "tolerances": {"identity_tol": -1}},
    {"scales": {"s": [0, 1]}, "problems": {"p": {"lagrangian": "v^2", "scale": "s", "a": 0, "b": 5,
                                                 "alpha": 0, "beta": 0, "setting": "delta"}}},
])
def test_broken_configs_exit_2(config_file, cfg):
    assert run("--config", config_file(cfg), "verify")[0] == 2


def test_missing_config_file_exit_2(tmp_path):
    assert run("--config", str(tmp_path / "absent.json"), "verify")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("--config", str(bad), "verify")[0] == 2


def test_load_config_defaults():
    cfg = load_config({"scales": {"s": [[0, 1]]}})
    assert cfg.tolerances == {"identity_tol": 1e-8, "integral_tol": 1e-9, "derivative_tol": 1e-6}
    with pytest.raises(ConfigError):
        load_config({"scales": []})


# -- variational commands -----------------------------------------------------------------


def test_minimize_then_el_check_on_uniform():
    rep = one("minimize", "uniform")
    assert [v for _, v in rep["y_table"]] == [0, 0.25, 0.5, 0.75, 1]
    rep = one("el-check", "uniform")
    assert rep["candidate"] == "minimizer" and rep["max_residual"] <= 1e-10


def test_el_check_classical_reports_its_domain():
    rep = one("el-check", "classical")
    assert rep["passed"] and rep["max_residual"] <= 1e-6
    assert rep["domain"]["setting"] == "delta" and rep["domain"]["kappa_domain"] == [[0, 1]]
    code, out, _ = run("el-check", "classical", "--y", "t")
    assert code == 1 and not lines(out)[0]["passed"]


def test_el_check_discrete_domain():
    # L = t*v has delta(L_v) = 1 and L_x = 0, so no candidate can make the residual vanish
    code, out, _ = run("el-check", "momentum")
    rep = lines(out)[0]
    assert code == 1
    assert [t for t, _ in rep["residuals"]] == [0, 1]
    assert all(abs(r - 1) <= 1e-15 for _, r in rep["residuals"])
    assert rep["domain"]["kappa_domain"] == [[0, 0], [1, 1], [2, 2]]


def test_weierstrass_witness():
    code, out, _ = run("weierstrass", "double_well", "--q", "1")
    rep = lines(out)[0]
    assert code == 1 and not rep["passed"]
    assert rep["witness"]["q"] == 1 and rep["witness"]["excess"] == -1


def test_weierstrass_passes_on_classical():
    assert one("weierstrass", "classical")["passed"]


def test_weierstrass_precondition_failure_is_exit_3(config_file):
    cfg = {"scales": {"s": [0, 1, 2]},
           "problems": {"w": {"lagrangian": "(v^2 - 1)^2", "scale": "s", "a": 0, "b": 2,
                              "alpha": 0, "beta": 0, "setting": "delta", "candidate": {"y": "0"}}}}
    code, _, err = run("--config", config_file(cfg), "weierstrass", "w")
    payload = json.loads(err)
    assert code == 3 and payload["error"] == "ConvexityPreconditionFailed" and "witness" in payload


def test_minimize_nonconvergence_payload():
    code, _, err = run("minimize", "spring", "--max-iter", "0")
    payload = json.loads(err)
    assert code == 3 and payload["error"] == "NonConvergence"
    assert payload["iterations"] == 0 and payload["gradient_norm"] > 0


def test_minimize_spring_converges():
    rep = one("minimize", "spring")
    assert rep["setting"] == "nabla" and rep["y_table"][0] == [0, 1] and rep["y_table"][-1] == [3, 0]


def test_minimize_needs_a_discrete_window():
    assert run("minimize", "classical")[0] == 2


def test_singular_hessian_exit_3(config_file):
    cfg = {"scales": {"s": [0, 1, 2]},
           "problems": {"lin": {"lagrangian": "x", "scale": "s", "a": 0, "b": 2,
                                "alpha": 0, "beta": 0, "setting": "delta"}}}
    code, _, err = run("--config", config_file(cfg), "minimize", "lin")
    assert code == 3 and json.loads(err)["error"] == "SingularHessian"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "timescales", "dualize", "--literal", "[[0,1]]"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout) == [[-1, 0]]
