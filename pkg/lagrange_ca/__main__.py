import sys

from lagrange_ca.cli import main

sys.exit(main())
