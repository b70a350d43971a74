#!/usr/bin/env python3
"""
Rotating Wave Toolkit - Command Line Entry Point

Numerical toolkit for rotating waves of the nonlinear wave equation on the
unit disk: Bessel zeros with enclosures, admissible velocities, spectral
gaps of the rotating operator and ground states of the reduced problem.

Version: 1.0.0
"""

import sys
from pathlib import Path

# Add src directory to Python path
sys.path.insert(0, str(Path(__file__).parent / "src"))

from src.utils.logger import get_logger
from src.cli.commands import run

logger = get_logger()


def main():
    """Main entry point."""
    try:
        sys.exit(run())
    except KeyboardInterrupt:
        sys.exit(0)
    except Exception as e:
        logger.error(f"Unhandled exception: {str(e)}")
        sys.exit(1)


if __name__ == "__main__":
    main()
