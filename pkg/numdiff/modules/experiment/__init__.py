# Experiment commands
