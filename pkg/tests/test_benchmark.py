import importlib.util
from pathlib import Path

from nomacast.cones import kernels

BENCH = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"


def test_benchmark_smoke(capsys):
    spec = importlib.util.spec_from_file_location("bench_kernels", BENCH)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    before = kernels.BACKEND
    assert mod.main(["--repeat", "2", "--blocks", "3", "--solves", "2"]) == 0
    assert kernels.BACKEND == before
    out = capsys.readouterr().out
    assert "end-to-end" in out and "nt_scaling" in out


def test_fallback_selected_by_environment():
    import subprocess
    import sys
    code = "from nomacast.cones import kernels; print(kernels.BACKEND)"
    env = {"NOMACAST_PURE_PYTHON": "1", "PATH": ""}
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
    assert out.stdout.strip() == "python"
