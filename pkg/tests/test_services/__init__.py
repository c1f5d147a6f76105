# Computation service tests
