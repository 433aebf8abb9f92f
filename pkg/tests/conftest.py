import random
from fractions import Fraction

from hypothesis import HealthCheck, settings, strategies as st

from chaoslab.symbolic_shift import BiSeq
from chaoslab.torus_dynamics import TorusPoint

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def words(N, min_size, max_size):
    return st.lists(st.integers(1, N), min_size=min_size, max_size=max_size).map(tuple)


@st.composite
def biseqs(draw, N=None):
    N = N or draw(st.sampled_from([2, 3, 5]))
    return BiSeq(N, draw(words(N, 1, 4)), draw(words(N, 0, 8)), draw(words(N, 1, 4)),
                 draw(st.integers(-6, 6)))


@st.composite
def biseq_pairs(draw, count=2):
    N = draw(st.sampled_from([2, 3, 5]))
    return tuple(draw(biseqs(N)) for _ in range(count))


def rationals(max_den=64):
    return st.builds(lambda n, d: Fraction(n, d), st.integers(-4 * max_den, 4 * max_den),
                     st.integers(1, max_den))


torus_points = st.builds(TorusPoint, rationals(), rationals())


def random_rational(rng: random.Random, max_den=60):
    d = rng.randint(1, max_den)
    return Fraction(rng.randrange(-d, d), 2 * d) if rng.random() < 0.5 else \
        Fraction(rng.randrange(d), d)
