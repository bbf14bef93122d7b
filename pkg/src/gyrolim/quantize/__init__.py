"""Coherent states, Toeplitz operators and phase-space transforms at scale hbar."""
