# Stats module
