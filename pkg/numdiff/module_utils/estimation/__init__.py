# Adaptive input and state estimation
