"""detphase test suite."""
