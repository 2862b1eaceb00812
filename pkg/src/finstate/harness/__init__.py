"""Random generators, seeded campaigns, JSON persistence and the CLI."""
