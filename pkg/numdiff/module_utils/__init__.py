# Shared utilities for the numdiff commands
