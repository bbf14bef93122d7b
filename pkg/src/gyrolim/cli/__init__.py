"""Command-line experiment drivers."""
