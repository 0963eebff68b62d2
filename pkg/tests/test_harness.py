from pathlib import Path

import pytest

from twostage.analytic import DesignParams, Mode, ProblemInstance, expected_total_tests
from twostage.errors import InvalidParametersError
from twostage.harness import (
    RobustnessRow,
    RobustnessSpec,
    SweepRow,
    SweepSpec,
    parse_range,
    robustness_rows,
    run_robustness,
    run_sweep,
    sweep_rows,
    theory_row_total,
    write_csv_atomic,
)

HEADER = (
    "scheme,n,model,k_or_p,m,secondary,reps,mean_total,stderr_total,"
    "theory_total,theory_closed_form,seed"
)


def test_parse_range_includes_stop_on_grid() -> None:
    assert parse_range("10:100:10", integer=True) == [float(k) for k in range(10, 101, 10)]
    assert parse_range("10:95:10", integer=True)[-1] == 90.0
    assert parse_range("5") == [5.0]
    probabilities = parse_range("0.01:0.1:0.01")
    assert len(probabilities) == 10
    assert probabilities[2] == 0.03
    assert probabilities[-1] == 0.1


@pytest.mark.parametrize("text", ["10:5:1", "1:2:0", "1:2:-1", "a:b:c", "1:2", ""])
def test_parse_range_rejects_bad_ranges(text: str) -> None:
    with pytest.raises(InvalidParametersError):
        parse_range(text)


def test_parse_range_integer_axis() -> None:
    with pytest.raises(InvalidParametersError):
        parse_range("1.5:3:1", integer=True)


def test_sweep_spec_validation() -> None:
    spec = SweepSpec.create(schemes="all", n=100, axis=[2, 4], reps=3, seed=1)
    assert [scheme.value for scheme in spec.schemes] == ["ftp", "fti", "rp"]
    for bad in (
        {"reps": 0},
        {"axis": []},
        {"axis": [100]},
        {"axis": [2.5]},
        {"schemes": []},
        {"model": "poisson"},
    ):
        payload = {"schemes": "fti", "n": 100, "axis": [2], "reps": 3, "seed": 1, **bad}
        with pytest.raises(InvalidParametersError):
            SweepSpec.create(**payload)
    with pytest.raises(InvalidParametersError):
        SweepSpec.create(schemes="fti", n=100, model="binomial", axis=[1.0], reps=3, seed=1)


def test_sweep_rows_are_axis_ordered_and_self_consistent() -> None:
    spec = SweepSpec.create(schemes="all", n=200, axis=[4, 8], reps=40, seed=42)
    rows = sweep_rows(spec)
    assert [(row.k_or_p, row.scheme) for row in rows] == [
        (4.0, "ftp"), (4.0, "fti"), (4.0, "rp"), (8.0, "ftp"), (8.0, "fti"), (8.0, "rp"),
    ]
    for row in rows:
        assert row.model == "fixedk"
        assert row.reps == 40 and row.seed == 42
        recomputed = theory_row_total(row.scheme, row.n, row.model, row.k_or_p, row.m, row.secondary)
        assert row.theory_total == pytest.approx(recomputed, rel=1e-12)
        assert row.stderr_total > 0


def test_single_replication_sweep_row() -> None:
    spec = SweepSpec.create(schemes="fti", n=500, axis=[5], reps=1, seed=3)
    (row,) = sweep_rows(spec)
    assert row.reps == 1
    assert row.stderr_total == 0.0


def test_binomial_rows_use_probability_column(tmp_path: Path) -> None:
    out = tmp_path / "binomial.csv"
    spec = SweepSpec.create(
        schemes="fti", n=1000, model="binomial", axis=parse_range("0.01:0.02:0.01"), reps=10, seed=5, out=out
    )
    rows = run_sweep(spec)
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == HEADER
    assert [line.split(",")[3] for line in lines[1:]] == ["0.01", "0.02"]
    assert all(line.split(",")[2] == "binomial" for line in lines[1:])
    inst = ProblemInstance.binomial(1000, 0.01)
    params = DesignParams.create("fti", rows[0].m, rows[0].secondary)
    assert rows[0].theory_total == expected_total_tests(inst, params, Mode.PAPER_APPROX).expected_total_tests


def test_sweep_csv_is_deterministic(tmp_path: Path) -> None:
    outputs = []
    for name in ("first.csv", "second.csv"):
        spec = SweepSpec.create(
            schemes="all", n=300, axis=[3, 6], reps=25, seed=9, out=tmp_path / name, workers=2
        )
        run_sweep(spec)
        outputs.append((tmp_path / name).read_bytes())
    assert outputs[0] == outputs[1]
    assert b"\r\n" not in outputs[0]
    assert outputs[0].decode("utf-8").startswith(HEADER + "\n")
    assert len(outputs[0].decode("utf-8").splitlines()) == 7


def _failing_rows():
    yield SweepRow("fti", 10, "fixedk", 1.0, 3, 1.0, 1, 4.0, 0.0, 4.2, 4.1, 0)
    raise RuntimeError("replication crashed")


def test_failed_write_leaves_no_partial_output(tmp_path: Path) -> None:
    target = tmp_path / "sweep.csv"
    with pytest.raises(RuntimeError):
        write_csv_atomic(target, SweepRow.header(), _failing_rows())
    assert not target.exists()
    assert list(tmp_path.iterdir()) == []


def test_failed_write_keeps_previous_file(tmp_path: Path) -> None:
    target = tmp_path / "sweep.csv"
    target.write_text("previous\n", encoding="utf-8")
    with pytest.raises(RuntimeError):
        write_csv_atomic(target, SweepRow.header(), _failing_rows())
    assert target.read_text(encoding="utf-8") == "previous\n"
    assert sorted(path.name for path in tmp_path.iterdir()) == ["sweep.csv"]


def test_robustness_rows(tmp_path: Path) -> None:
    out = tmp_path / "robust.csv"
    spec = RobustnessSpec.create(
        scheme="fti", n=2000, k_true=20, k_estimates=[20, 25], reps=30, seed=4, out=out
    )
    rows = run_robustness(spec)
    assert rows[0].k_est == 20
    assert rows[0].inflation_theoretical == pytest.approx(1.0)
    assert rows[0].inflation_simulated == 1.0
    assert rows[1].inflation_theoretical >= 1.0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(RobustnessRow.header())
    assert lines[0] == "k_est,inflation_theoretical,inflation_simulated"
    assert lines[1].startswith("20,")


def test_robustness_spec_validation() -> None:
    with pytest.raises(InvalidParametersError):
        RobustnessSpec.create(scheme="fti", n=100, k_true=20, k_estimates=[0], reps=3, seed=1)
    with pytest.raises(InvalidParametersError):
        RobustnessSpec.create(scheme="fti", n=100, k_true=100, k_estimates=[5], reps=3, seed=1)


def test_robustness_overestimate_by_a_quarter() -> None:
    spec = RobustnessSpec.create(
        scheme="fti", n=10_000, k_true=100, k_estimates=[125], reps=20, seed=8
    )
    (row,) = robustness_rows(spec)
    assert row.inflation_theoretical == pytest.approx(1.043, abs=0.005)
    assert row.inflation_simulated == pytest.approx(row.inflation_theoretical, abs=0.03)


@pytest.mark.slow
def test_fixed_k_sweep_agrees_with_theory() -> None:
    spec = SweepSpec.create(
        schemes=["ftp", "fti"], n=1000, axis=parse_range("10:100:10", integer=True), reps=1000, seed=42
    )
    rows = sweep_rows(spec)
    by_point: dict[float, dict[str, SweepRow]] = {}
    for row in rows:
        by_point.setdefault(row.k_or_p, {})[row.scheme] = row
        inst = ProblemInstance.fixed_k(row.n, row.k_or_p)
        params = DesignParams.create(row.scheme, row.m, row.secondary)
        # Pools of a fixed-size design are independent given the infected set, so the
        # exact form is the true expectation there.
        reference = (
            expected_total_tests(inst, params, Mode.EXACT).expected_total_tests
            if row.scheme == "ftp"
            else row.theory_total
        )
        assert abs(row.mean_total - reference) / reference <= 0.03
        if row.scheme == "fti" or row.k_or_p >= 20:
            assert abs(row.mean_total - row.theory_total) / row.theory_total <= 0.03
    for point in by_point.values():
        assert point["fti"].mean_total < point["ftp"].mean_total
        assert point["fti"].theory_closed_form < point["ftp"].theory_closed_form


@pytest.mark.slow
def test_fixed_k_sweep_agrees_with_theory_at_scale() -> None:
    spec = SweepSpec.create(
        schemes=["ftp", "fti"], n=10_000, axis=parse_range("100:1000:100", integer=True), reps=200, seed=42
    )
    rows = sweep_rows(spec)
    for row in rows:
        assert abs(row.mean_total - row.theory_total) / row.theory_total <= 0.03
    fti = [row for row in rows if row.scheme == "fti"]
    ftp = [row for row in rows if row.scheme == "ftp"]
    assert all(a.mean_total < b.mean_total for a, b in zip(fti, ftp))


@pytest.mark.slow
def test_binomial_sweep_agrees_with_substituted_theory() -> None:
    spec = SweepSpec.create(
        schemes=["ftp", "fti"],
        n=10_000,
        model="binomial",
        axis=parse_range("0.01:0.1:0.01"),
        reps=200,
        seed=42,
    )
    for row in sweep_rows(spec):
        assert abs(row.mean_total - row.theory_total) / row.theory_total <= 0.03


@pytest.mark.slow
def test_robustness_sweep_stays_bounded() -> None:
    spec = RobustnessSpec.create(
        scheme="fti", n=10_000, k_true=100, k_estimates=[75, 100, 125, 150], reps=200, seed=42
    )
    for row in robustness_rows(spec):
        assert row.inflation_theoretical <= 1.15
        assert row.inflation_simulated <= 1.15 + 0.03
