# Stencil programs package
