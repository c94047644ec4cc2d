# Particle interaction package
