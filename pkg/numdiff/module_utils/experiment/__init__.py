# Experiment sweeps: algorithm factory and cell runner
