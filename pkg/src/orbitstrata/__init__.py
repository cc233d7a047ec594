"""Orbit-space stratification toolkit."""

