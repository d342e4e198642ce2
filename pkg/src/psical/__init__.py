"""Numerical workbench for pseudo-differential calculi with Gevrey-type symbols.

Grids and fields live in :mod:`psical.grid`; the STFT in :mod:`psical.stft`;
quantization, transfer and sharp products in :mod:`psical.quantize` and
:mod:`psical.calculus`; weights in :mod:`psical.weights`; diagnostics in
:mod:`psical.symbols` and :mod:`psical.continuity`.
"""

from .calculus import PolySymbol, quantization_change, sharp, trace_restrict, transfer, transfer_series
from .grid import Field, Grid, MixedNormSpec, fourier, make_grid, mixed_norm, shear, symbol_grid
from .quantize import QuantizationMatrix, apply, direct_apply, kernel_from_symbol, op_matrix, symbol_from_kernel
from .stft import StftData, gaussian_window, istft, mod_norm, stft

__version__ = "0.1.0"

__all__ = [
    "Field", "Grid", "MixedNormSpec", "PolySymbol", "QuantizationMatrix", "StftData",
    "apply", "direct_apply", "fourier", "gaussian_window", "istft", "kernel_from_symbol",
    "make_grid", "mixed_norm", "mod_norm", "op_matrix", "quantization_change", "sharp",
    "shear", "stft", "symbol_from_kernel", "symbol_grid", "trace_restrict", "transfer",
    "transfer_series",
]
