"""Main module for worstclass_boost.

Allows the CLI to be run as a Python module using:
python -m worstclass_boost
"""

from worstclass_boost.cli.app import main

if __name__ == "__main__":
    main()
