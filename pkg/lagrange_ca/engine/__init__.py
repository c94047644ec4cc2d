# Simulation engine package
