"""Independent numerical solvers used to check the symbolic results."""
