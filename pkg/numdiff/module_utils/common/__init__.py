# Base utilities shared across numdiff modules
