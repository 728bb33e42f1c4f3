"""Joint multisine/OFDM waveform design for SWIPT with a fourth-order rectenna model."""

__version__ = "0.1.0"
