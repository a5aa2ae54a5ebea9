import sys

from infogeo.cli import main

sys.exit(main())
