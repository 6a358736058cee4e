"""
Main entry for the pipeline.
Run from command line using: `python -m mtfl <command>`
"""
import sys

from mtfl.cli import main

sys.exit(main())
