import sys

from urlab.cli import main

sys.exit(main())
