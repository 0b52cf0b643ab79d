import sys

from geomis.cli import main

sys.exit(main())
