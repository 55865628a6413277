# Job decomposition
