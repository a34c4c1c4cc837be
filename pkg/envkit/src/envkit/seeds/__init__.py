# Seed environment sources. These files are data, not importable modules:
# the protocol server executes them with the kit base injected.
