import sys

from equiszego.cli import main

sys.exit(main())
