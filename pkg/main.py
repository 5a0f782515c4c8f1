"""Alternative entry point for running CLI."""

from ufls.cli import app

if __name__ == "__main__":
    app()
