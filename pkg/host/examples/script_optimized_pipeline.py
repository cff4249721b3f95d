#!/usr/bin/env python3
"""Host-side optimized edge detection through the bindings. Usage:

    python examples/script_optimized_pipeline.py --image <pgm>
"""
import sys

from fabrichost.script_optimized import main

if __name__ == "__main__":
    sys.exit(main())
