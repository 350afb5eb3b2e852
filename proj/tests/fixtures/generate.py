"""Regenerates the trace fixtures. Output is byte-stable for a fixed seed."""
import numpy as np

rng = np.random.default_rng(20221116)


def write(name, rows, unit, span=None):
    with open(name, "w") as f:
        if span is not None:
            f.write(f"# span_ns={span}\n")
        f.write("timestamp_ns,value,unit\n")
        for t, v in rows:
            f.write(f"{t},{v},{unit}\n")


# latency with a lognormal body
n = 2000
v = np.round(1190 * np.exp(np.abs(rng.normal(0, 0.08, n)))).astype(int)
write("latency_lognormal.csv", [(i * 1000, int(x)) for i, x in enumerate(v)], "ns")

# heavy-tailed latency: pareto tail on a 10 us floor
v = np.round(10000 * (1 + rng.pareto(2.5, n))).astype(int)
write("latency_pareto.csv", [(i * 1000, int(x)) for i, x in enumerate(v)], "ns")

# narrow body with a single sample 10^4 times the minimum
v = np.round(1700 + rng.uniform(0, 60, 999)).astype(int).tolist()
v.insert(500, 1700 * 10000)
write("latency_outlier.csv", [(i * 1000, int(x)) for i, x in enumerate(v)], "ns")

# two-point latency: base with p=0.99, ten times base with p=0.01
v = [1190] * 99
v.insert(37, 11900)
write("latency_twopoint.csv", [(i * 1000, x) for i, x in enumerate(v)], "ns")

# two-point bandwidth: full with p=0.9, half with p=0.1
v = [100] * 100
for i in range(5, 100, 10):
    v[i] = 50
write("bandwidth_twopoint.csv", [(i * 1000, x) for i, x in enumerate(v)], "gbps")

# OS detours no longer than 100 us over one second
t = 0
rows = []
span = 1_000_000_000
while True:
    t += int(rng.integers(200_000, 2_000_000))
    d = int(rng.integers(1_000, 20_000)) if rng.uniform() < 0.95 else int(rng.integers(50_000, 100_001))
    if t + d >= span:
        break
    rows.append((t, d))
    t += d
write("detours_100us.csv", rows, "ns", span)
