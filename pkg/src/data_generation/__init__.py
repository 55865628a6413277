# Data generation module
