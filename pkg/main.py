"""Run the ndoppe command line from a source checkout: python main.py report"""

import os
import sys

# Add the source directory so the package resolves without installation
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from python.cli import main

if __name__ == "__main__":
    sys.exit(main())
