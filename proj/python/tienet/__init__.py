"""Simulated TIE phase retrieval with neural-network phase adjustment."""

from ._tienet import (
    TienetError,
    add_shot_noise,
    adjust,
    default_config,
    defocus_series,
    electron_wavelength,
    evaluate,
    generate_dataset,
    interaction_constant,
    offset_correct,
    propagate,
    read_field,
    render,
    retrieve_phase,
    rms_error,
    sample_spec,
    simulate_pair,
    spectral_forward,
    spectral_inverse,
    thickness_map,
    train,
    write_field,
)

__all__ = [
    "TienetError",
    "add_shot_noise",
    "adjust",
    "default_config",
    "defocus_series",
    "electron_wavelength",
    "evaluate",
    "generate_dataset",
    "interaction_constant",
    "offset_correct",
    "propagate",
    "read_field",
    "render",
    "retrieve_phase",
    "rms_error",
    "sample_spec",
    "simulate_pair",
    "spectral_forward",
    "spectral_inverse",
    "thickness_map",
    "train",
    "write_field",
]
