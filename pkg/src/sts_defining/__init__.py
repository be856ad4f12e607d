"""Defining sets of weak 3-colorings of Steiner triple systems."""
