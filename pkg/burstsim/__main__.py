import sys

from burstsim.cli import main

sys.exit(main())
