import sys

from cyclecancel.cli import main

sys.exit(main())
