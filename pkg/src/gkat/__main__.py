import sys

from gkat.cli import main

sys.exit(main())
