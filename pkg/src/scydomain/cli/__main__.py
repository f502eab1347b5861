import sys

from scydomain.cli import main

sys.exit(main())
