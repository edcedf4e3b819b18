"""Case-study model systems, generators, closed forms and scenario files."""
