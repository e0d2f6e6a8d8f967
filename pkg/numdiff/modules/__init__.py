# Command modules for numdiff
