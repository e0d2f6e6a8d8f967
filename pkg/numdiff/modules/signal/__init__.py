# Signal-related commands
