"""calmlab: write distributed programs as networks of relational transducers,
classify them as monotone or not, and test confluence and coordination-
freeness by exploring delivery schedules and input partitionings at desk
scale."""

__version__ = "0.1.0"
