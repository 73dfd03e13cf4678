"""APW secular equation machinery with boundary-jump eigenvalue certificates."""
