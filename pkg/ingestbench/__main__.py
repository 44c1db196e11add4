import sys

from ingestbench.bench.cli import main

sys.exit(main())
