import sys

from nonloc.cli import main

sys.exit(main())
