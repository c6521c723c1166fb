# -*- coding: utf-8 -*-
"""
vr3c - Main Entry Point
Joint caching and computation offloading solver for mobile VR FOV delivery
"""

# Suppress deprecation warnings for cleaner output
import warnings
warnings.filterwarnings("ignore", category=DeprecationWarning)

from dotenv import load_dotenv
load_dotenv()

import sys
from pathlib import Path

# Add Backend to path
sys.path.insert(0, str(Path(__file__).parent))

from Backend.cli import main


if __name__ == "__main__":
    sys.exit(main())
