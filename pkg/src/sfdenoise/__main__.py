import sys

from sfdenoise.cli import main

sys.exit(main())
