import math

from hypothesis import settings
from pytest import fixture

from casimir.materials import Constant, Dielectric, Drude, PerfectConductor, Plasma, Vacuum, Weyl
from casimir.stack import LayerStack

from .strategies import conductor_gap

settings.register_profile('casimir', deadline=None)
settings.load_profile('casimir')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: quadrature-heavy acceptance checks')


@fixture
def gap_stack():
    return conductor_gap(1.0)


@fixture
def metal_stack():
    """PC | Drude slab | vacuum | constant slab | PC."""
    return LayerStack.from_layers([
        (PerfectConductor(), math.inf),
        (Dielectric(Drude(1.5, 0.1)), 0.4),
        (Vacuum(), 1.0),
        (Dielectric(Constant(3.0)), 0.6),
        (PerfectConductor(), math.inf),
    ])


@fixture
def open_slab_stack():
    """vacuum | plasma slab | vacuum | constant slab | vacuum, no conductors."""
    return LayerStack.from_layers([
        (Vacuum(), math.inf),
        (Dielectric(Plasma(1.2)), 0.5),
        (Vacuum(), 0.8),
        (Dielectric(Constant(2.5)), 0.3),
        (Vacuum(), math.inf),
    ])


@fixture
def weyl_stack():
    """PC | vacuum | Weyl slab | vacuum | PC."""
    return LayerStack.from_layers([
        (PerfectConductor(), math.inf),
        (Vacuum(), 0.9),
        (Weyl(0.6), 0.5),
        (Vacuum(), 1.1),
        (PerfectConductor(), math.inf),
    ])
