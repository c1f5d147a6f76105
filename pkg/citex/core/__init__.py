# Command runner, constants, exceptions
