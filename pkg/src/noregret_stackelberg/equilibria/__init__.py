"""Equilibrium polytopes, Nash enumeration and Stackelberg values."""

from .nash import (
    MAX_ACTIONS,
    MAX_PLAYERS,
    check_size_cap,
    is_nash,
    mixed_nash_support_enumeration,
    pure_nash_profiles,
)
from .polytopes import (
    CED,
    HANNAN,
    build_ced_system,
    build_hannan_system,
    build_system,
    l1_distance_to_set,
    min_or_max_over_polytope,
    optimize_over_polytope,
)
from .stackelberg import (
    DEFAULT_GRID,
    StackelbergReport,
    ValueResult,
    correlated_stackelberg_value,
    grid_maximize,
    hannan_stackelberg_value,
    mixed_stackelberg_values,
    pure_stackelberg_values,
    stackelberg_report,
)
