from ._core import (
    ConfigError,
    antiferro,
    larmor_period_ps,
    run_config,
    scenarios,
    single_spin,
    solve_2p_levels,
    sudden_offset_deg,
)

__all__ = [
    "ConfigError",
    "antiferro",
    "larmor_period_ps",
    "run_config",
    "scenarios",
    "single_spin",
    "solve_2p_levels",
    "sudden_offset_deg",
]
