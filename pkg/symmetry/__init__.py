"""Group generators, prolongation, invariance checks and renormgroup restriction."""
