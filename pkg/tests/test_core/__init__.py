# Command runner tests
