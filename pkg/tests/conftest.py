import os

# headless plotting for CLI tests
os.environ.setdefault("MPLBACKEND", "Agg")
