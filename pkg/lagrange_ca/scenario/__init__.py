# Scenario files: loading, validation and output writers.
