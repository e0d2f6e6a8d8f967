# Real-time numerical differentiation with adaptive input and state estimation

__version__ = "0.1.0"
