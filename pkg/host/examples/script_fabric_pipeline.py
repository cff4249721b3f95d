#!/usr/bin/env python3
"""Load overlay -> configure routes via MMIO -> DMA a frame in and the edge
map out. Usage:

    python examples/script_fabric_pipeline.py --image <pgm> --overlay <descriptor>
"""
import sys

from fabrichost.script_fabric import main

if __name__ == "__main__":
    sys.exit(main())
