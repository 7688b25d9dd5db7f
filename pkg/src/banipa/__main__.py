import sys

from banipa.cli import main

sys.exit(main())
