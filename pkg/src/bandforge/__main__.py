import sys

from bandforge.cli import main

sys.exit(main())
