"""Independent brute-force implementations used as test oracles.

Everything here is written directly from the defining formulas with plain
Python floats and math.fsum, deliberately sharing no code with the package.
"""

from __future__ import annotations

import math

MASK64 = (1 << 64) - 1


def mean(values):
    return math.fsum(values) / len(values)


def central_moment(values, order):
    m = mean(values)
    return math.fsum((x - m) ** order for x in values) / len(values)


def population_std(values):
    return math.sqrt(central_moment(values, 2))


def percentile_linear(values, p):
    """Linear interpolation between closest ranks at index p/100 * (n-1)."""
    ordered = sorted(values)
    position = p / 100 * (len(ordered) - 1)
    lower = math.floor(position)
    upper = math.ceil(position)
    fraction = position - lower
    return ordered[lower] * (1 - fraction) + ordered[upper] * fraction


def skewness(values):
    m2 = central_moment(values, 2)
    return central_moment(values, 3) / m2**1.5


def excess_kurtosis(values):
    m2 = central_moment(values, 2)
    return central_moment(values, 4) / m2**2 - 3.0


def pearson(xs, ys):
    mx, my = mean(xs), mean(ys)
    cov = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys)) / len(xs)
    return cov / (population_std(xs) * population_std(ys))


def competition_rank(rewards, participant):
    return 1 + sum(1 for value in rewards if value > rewards[participant])


def splitmix64_outputs(seed, count):
    """Transcription of the published SplitMix64 reference algorithm."""
    x = seed & MASK64
    out = []
    for _ in range(count):
        x = (x + 0x9E3779B97F4A7C15) & MASK64
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        out.append(z ^ (z >> 31))
    return out


# First five outputs of the reference algorithm, frozen from the
# transcription above (seed 0 additionally cross-checked against the widely
# quoted value 0xE220A8397B1DCDAF).
SPLITMIX64_SEED0 = (
    16294208416658607535,
    7960286522194355700,
    487617019471545679,
    17909611376780542444,
    1961750202426094747,
)
SPLITMIX64_SEED1234567 = (
    6457827717110365317,
    3203168211198807973,
    9817491932198370423,
    4593380528125082431,
    16408922859458223821,
)
