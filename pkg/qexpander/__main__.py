"""Command-line entry point for qexpander."""
from .expanders.cli import main

if __name__ == "__main__":
    main()
