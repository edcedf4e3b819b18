"""Command-line driver: verification batteries, figure tables and run reports."""
