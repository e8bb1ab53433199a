// training placeholder
