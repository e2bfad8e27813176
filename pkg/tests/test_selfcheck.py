import subprocess
import sys
from fractions import Fraction
from pathlib import Path

from wce.selfcheck import propagator_series, run_suites


def test_propagator_series_shape():
    ser = propagator_series(Fraction(1, 6), 3)
    assert ser[-2] == 1 and ser[-1] == 0
    # P_0 = (1 - a) a / 2 for a = 1/6
    assert ser[0] == Fraction(5, 72)


def test_d4_quick_suites(d4):
    d, gens, _ = d4
    results = run_suites(d, gens, quick=True)
    assert all(r.ok for r in results), [r.line() for r in results if not r.ok]
    assert len(results) == 9


def test_a2_suites(a2):
    d, gens, _ = a2
    assert all(r.ok for r in run_suites(d, gens))


def test_benchmark_smoke():
    script = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    res = subprocess.run([sys.executable, str(script), "--pairs", "200", "--repeat", "1", "--skip-end-to-end"],
                         capture_output=True, text=True, check=True)
    assert "pure python" in res.stdout
