"""Make the expanders module executable."""

from .cli import main

if __name__ == "__main__":
    main()
