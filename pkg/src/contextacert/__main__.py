import sys

from contextacert.cli import main

sys.exit(main())
