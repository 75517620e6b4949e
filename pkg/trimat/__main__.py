"""Allow running trimat as: python -m trimat."""

from trimat.cli import main

main()
