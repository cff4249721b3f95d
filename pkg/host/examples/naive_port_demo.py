#!/usr/bin/env python3
"""Deliberately slow per-pixel script port (cautionary demo). Usage:

    python examples/naive_port_demo.py --image <pgm> [--crop 64]
"""
import sys

from fabrichost.naive_port import main

if __name__ == "__main__":
    sys.exit(main())
