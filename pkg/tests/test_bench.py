import importlib.util
import os

BENCH = os.path.join(os.path.dirname(__file__), "..", "benchmarks", "bench_kernels.py")


def test_benchmark_backends_agree(capsys):
    spec = importlib.util.spec_from_file_location("bench_kernels", BENCH)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    assert mod.main(["--repeat", "1", "--json"]) == 0
    out = capsys.readouterr().out
    assert "refine_partition" in out and "speedup" in out
