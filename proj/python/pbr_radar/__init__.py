"""Passive FM radar range resolution: IFFT vs MUSIC.

Thin Python layer over the C++ core. Configs are plain dicts with the same
keys as the command-line config files.
"""

from ._pbr import (
    EmptyResultError,
    ScenarioConfig,
    SpectrumQuotient,
    __version__,
    bandpass,
    bin_aligned_shift,
    cmd_fig10,
    cmd_simulate,
    cmd_sweep,
    cmd_table1,
    compose_multichannel,
    delay_to_range,
    detect,
    eig_subspace,
    estimate_covariance,
    exact_two_tone_covariance,
    fm_modulate,
    ifft_profile,
    monte_carlo_error,
    prepare_scene,
    pseudospectrum,
    quotient,
    range_to_delay,
    render_scene,
    resolution_sweep,
    resolvability,
    run_scenario,
    synthesize_message,
    two_tone_snapshot,
)

__all__ = [name for name in dir() if not name.startswith("_")]
